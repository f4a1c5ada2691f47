"""Streaming monotonic-attention translation policy, simulator, and evaluator.

Subpackages:

- ``numerics``: dense matrix primitives plus a reverse-mode gradient tape
- ``emma``: stepwise probabilities, monotonic alignment, infinite-lookback
  attention, and the regularized training objective
- ``runtime``: the incremental read/write inference state machine
- ``metrics``: average lagging, length-adaptive average lagging, playback
  offsets, and corpus BLEU
- ``harness``: instance files, corpus evaluation, threshold sweeps, toy
  training, report emission, and the CLI
"""

__version__ = "0.1.0"
