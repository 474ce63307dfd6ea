"""Leading-term asymptotics for coefficient arrays of multivariate
generating functions G/H, with an exact series oracle for validation.

Modules:
    polycore         exact polynomials, analytic expressions, root isolation
    series_oracle    exact coefficient extraction and error curves
    critical         critical-point systems, minimality, contributing points
    asymptotics      smooth and multiple-point leading terms
    riordan_lagrange one-free-variable pipelines (convolution families)
    transfer         transfer matrices and forbidden-pattern counting
    kernel           directed lattice walks via the kernel method
    cli              problem files, reports, command-line entry points
"""

__version__ = "0.1.0"
