"""Cole-Hopf laboratory for the complex viscous Burgers equation u_t + u u_x = u_xx."""
__version__ = "0.1.0"
