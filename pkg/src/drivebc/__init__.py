"""drivebc: learn and evaluate an acceleration-prediction driving policy.

Segments of multi-sensor driving data (synthetic or exported) flow through a
feature pipeline into sliding windows; LSTM encoder-decoder models and
simpler baselines are trained to predict the next five frames of ego
acceleration and scored with per-clip MAE.
"""

__version__ = "0.1.0"
