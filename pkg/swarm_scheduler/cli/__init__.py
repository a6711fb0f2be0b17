"""CLI модуль - интерфейс командной строки."""
