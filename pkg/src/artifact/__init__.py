"""Random real algebraic geometry experiments: Kostlan ensembles, zero loci and transversality constants."""

__version__ = "0.1.0"
