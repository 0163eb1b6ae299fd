"""Stage-wise visual imitation at desk scale.

A pipeline that turns unpaired two-domain video into instruction images via
cycle-consistent translation, learns a sequential latent model of pixels and
actions, scores task stages with latent-space classifiers, and practices each
stage with sampling-based model-predictive control under binary human (or
oracle) feedback.
"""

__version__ = "0.1.0"
