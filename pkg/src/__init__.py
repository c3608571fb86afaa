"""
Fractional Sobolev Laboratory
Gagliardo, Triebel-Lizorkin and Bessel-potential seminorms on a periodic grid
"""

__version__ = "0.3.0"
