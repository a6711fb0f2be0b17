"""Сценарии экспериментов: конфигурация, прогон, сравнение, перебор и отчёты."""
