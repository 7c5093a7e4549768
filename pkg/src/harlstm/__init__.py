"""Eating-gesture recognition from wrist accelerometer streams.

Pipeline: recording/annotation ingest -> supervisor-trimmed segments ->
overlapping windows -> stacked-LSTM classifier trained with hand-derived
BPTT gradients -> confusion-matrix evaluation. A CLI ties the stages
together and a small HTTP service receives uploads and serves the
annotation console.
"""

__version__ = "0.1.0"
