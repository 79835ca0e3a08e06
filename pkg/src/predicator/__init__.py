"""If-conversion autotuning: an SSA IR with a bitmask-driven if-conversion
pass, per-branch static features, a trace-driven cycle model, and a NEAT
search over convert/keep decisions."""

__version__ = "0.1.0"
