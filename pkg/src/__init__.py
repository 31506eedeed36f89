"""
knorabench - динамический выбор ансамбля классификаторов KNORA-U/E/B/BI
для несбалансированных данных и экспериментальный стенд для их сравнения.
"""

__version__ = "1.0.0"
