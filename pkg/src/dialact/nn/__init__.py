from .kernels import BACKEND, conv2d_forward, conv2d_backward
from .layers import (Parameter, Layer, Dense, ReLU, Conv2D, MaxOverTime,
                     Flatten, Embedding, LSTM, BiLSTM,
                     softmax_cross_entropy, softmax_xent_batch,
                     glorot_uniform, orthogonal)
from .gradcheck import gradcheck

__all__ = [
    "BACKEND", "conv2d_forward", "conv2d_backward",
    "Parameter", "Layer", "Dense", "ReLU", "Conv2D", "MaxOverTime",
    "Flatten", "Embedding", "LSTM", "BiLSTM",
    "softmax_cross_entropy", "softmax_xent_batch",
    "glorot_uniform", "orthogonal", "gradcheck",
]
