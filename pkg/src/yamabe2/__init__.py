"""Second Yamabe constants of Riemannian products, computed at desk scale."""

__version__ = "0.1.0"
