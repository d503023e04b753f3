"""Triplet-comparison toolkit for fine-grained image quality scaling.

Prepares boosted stimuli, designs and serves triplet-comparison studies,
simulates observers, and reconstructs impairment scales in JND units with
bootstrap confidence intervals.
"""

__version__ = "0.1.0"
