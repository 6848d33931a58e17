"""Structure and mod-p cohomology of finite p-groups."""

__version__ = "0.1.0"
