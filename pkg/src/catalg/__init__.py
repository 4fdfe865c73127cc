"""catalg: exact set-level computations for finite categories, spans,
2-Segal objects, Day convolution over double categories, and the
composition product on colored symmetric sequences."""

__version__ = "0.1.0"
