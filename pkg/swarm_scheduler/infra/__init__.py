"""Инфраструктурные компоненты."""
