"""CLI subcommands, one module each"""

from . import align_docs, annotate, baseline, decode, evaluate, export_lm, stats, train

COMMANDS = [annotate, train, decode, evaluate, baseline, align_docs, export_lm, stats]

__all__ = ["COMMANDS"]
