"""browniansim: simulate and certify adiabatic Brownian distribution samplers.

Builds Las Vegas and Monte Carlo sampler machines from reversible Turing
machines, runs their unbiased random-walk dynamics, applies the observer
measurement protocols, and statistically checks the emitted samples against
the target distribution.
"""

__version__ = "0.1.0"
