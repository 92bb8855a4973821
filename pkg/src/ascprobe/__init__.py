"""ascprobe: ASC corpus generation, from-scratch LSTM LM, and layer-geometry analysis."""

__version__ = "0.1.0"
