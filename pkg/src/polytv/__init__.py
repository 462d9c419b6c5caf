"""Total-variation bounds between second-degree polynomials in Gaussian vectors."""
