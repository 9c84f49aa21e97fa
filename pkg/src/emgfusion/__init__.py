"""EMG + speech multimodal control of a simulated robotic arm.

Modules:

- ``dsp``: preprocessing (DC removal, 60 Hz notch) and window features
- ``synth``: synthetic captures, CSV datasets, modality error sampling
- ``classifiers`` / ``evaluation``: six classifiers and tenfold CV
- ``speech``: utterance normalisation and alias resolution
- ``fusion``: gesture-priority decision fusion, score and feature fusion
- ``arm``: pin-driven servo simulator
- ``net``: line protocol server and client
- ``harness``: Monte-Carlo error trials and block statistics
"""
from .labels import GestureLabel, SpeechCommand

__version__ = "0.1.0"
__all__ = ["GestureLabel", "SpeechCommand", "__version__"]
