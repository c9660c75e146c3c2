"""Spectral numerics for the focusing inhomogeneous Schrödinger–Choquard equation.

Modules: ``model`` (parameters and exponents), ``grid`` and ``radial``
(discretizations), ``operators`` (FFT operators, Riesz potentials),
``nonlinearity`` (Hartree term and functionals), ``ground_state``
(Petviashvili solver, thresholds), ``integrator`` (Strang splitting),
``morawetz`` (virial/Morawetz identities), ``detectors`` (verdicts) and
``harness`` (configs, commands).
"""
__version__ = "0.1.0"
