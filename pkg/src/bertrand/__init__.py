"""Hamiltonian dynamics on Bertrand spaces.

Submodules:

* :mod:`bertrand.spaces`      metric and potential families, charts, examples
* :mod:`bertrand.dynamics`    Hamiltonian, equations of motion, integration
* :mod:`bertrand.orbits`      closed-form orbit equations and measurements
* :mod:`bertrand.runge_lenz`  generalised Runge-Lenz vector, conserved tensor
* :mod:`bertrand.cli`         command-line front end
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .spaces import BertrandParams, Family, example_catalog  # noqa: F401
from .dynamics import IntegratorSettings, PhaseState, integrate  # noqa: F401
