# -*- coding: utf-8 -*-
"""
ceplan: cost-efficiency planning of mobile data traffic from the user side.
"""

__version__ = "0.1.0"
