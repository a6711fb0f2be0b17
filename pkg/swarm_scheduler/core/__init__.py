"""Core модуль - модели, энергия, PCP, движок и метрики."""
