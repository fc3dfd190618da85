""" Tensor-train compression anomaly detection. """

__version__ = "0.1.0"
