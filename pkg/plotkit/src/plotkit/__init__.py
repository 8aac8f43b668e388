"""Batch figure regeneration from esdflow's delimited outputs.

plotkit reads only the solver's documented file formats (headered CSV and
legacy-ASCII VTK) and renders the benchmark figure types: the entropy
convergence log-log plot, interface pressure/velocity profiles,
schlieren-style density-gradient images and interface trajectories.
Rendering is deterministic: identical inputs give byte-identical images.
"""

__version__ = "0.1.0"
