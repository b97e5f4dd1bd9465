"""Airline-tweet sentiment pipeline: corpus pruning, tweet cleaning,
augmentation, embedding/PCA features and from-scratch classifiers."""
__version__ = "0.1.0"
