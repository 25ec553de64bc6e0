"""cropemu: desk-scale probabilistic crop-simulator emulation pipeline.

Subpackages map onto the pipeline stages: quasi-random experiment design
(`sampling`), a mechanistic oracle simulator (`cropsim`), latent weather
encoding and synthesis (`weather`), the neural emulator (`emulator`), SWAG
posterior uncertainty (`swag`), resilient-trait discovery (`discovery`),
and the `cli` front door. `nncore` is the shared numpy neural substrate.
"""

__version__ = "0.1.0"
