"""Graph, forcing, linear algebra and certificate routines."""
