"""Cellular-automata saliency detection toolkit.

Segments an image into superpixels, propagates a boundary-seeded prior over
a feature-similarity graph with a synchronous cellular-automaton rule, and
fuses multi-scale (or externally supplied) saliency maps with a Bayesian
log-odds cuboid automaton.  Ships with the usual saliency benchmark metrics
(PR curves, F-measure, MAE), a FastAPI service, and a thin CLI client.
"""

__version__ = "0.1.0"
