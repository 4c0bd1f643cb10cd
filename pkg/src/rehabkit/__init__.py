"""rehabkit: skeleton-motion rehabilitation toolkit.

Live, color-coded per-joint feedback against exercise templates, plus a
learned exercise scorer (sequence autoencoder feeding a multi-scale CNN-LSTM
regressor) on a self-contained reverse-mode autodiff core.
"""

__version__ = "0.1.0"
