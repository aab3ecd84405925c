"""
Planar Directed Steiner Network toolkit
Exact desk-scale solving, demand-pattern detection, cleaning and hardness gadgets
"""

__version__ = '1.0.0'
