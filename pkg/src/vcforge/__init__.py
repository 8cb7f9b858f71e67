"""Voice conversion toolkit.

Subpackages: ``numerics`` (autodiff and optimizers), ``dsp`` (audio, features,
vocoder), ``cyclegan``, ``nmf`` and ``eval``. The ``vcforge`` console script
wires them together.
"""

__version__ = "0.1.0"
