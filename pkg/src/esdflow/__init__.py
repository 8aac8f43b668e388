"""Entropy-stable / double-flux finite-volume solver for multi-component
compressible flow.

The package is organized as a small library plus a CLI:

* :mod:`esdflow.thermo`  -- species data, mixture thermodynamics, equivalent
  perfect-gas ("star") properties
* :mod:`esdflow.state`   -- conserved/primitive/entropy-variable state maps
* :mod:`esdflow.flux`    -- interface numerical fluxes and dissipation
* :mod:`esdflow.mesh`    -- 1D/2D Cartesian mesh with quadtree AMR
* :mod:`esdflow.solver`  -- semi-discrete residual, SSP-RK3 driver
* :mod:`esdflow.cases`   -- benchmark initial conditions and diagnostics
* :mod:`esdflow.cli`     -- ``esdflow run|verify|convergence|report``
"""

__version__ = "0.1.0"
