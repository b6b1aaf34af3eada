"""Paraxial Fourier-optics simulator for structured-pump parametric down-conversion
in the advanced-wave picture.

Modules
-------
field      sampled complex fields and the unitary angular-spectrum transform
optics     free space, thin lenses, masks, optical systems, sources
pdc        coincidence amplitudes, seeded/spontaneous idler intensities, oracle
frft       fractional Fourier transforms and the lensless curved-pump geometry
metrics    widths, visibility, correlations
scenarios  configured end-to-end experiments
cli        ``awp-sim`` command line
"""

__version__ = "0.1.0"
