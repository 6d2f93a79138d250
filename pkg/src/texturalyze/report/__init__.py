"""Report layer: CSV/SVG emitters, subcommands and the CLI."""

from .commands import cmd_ca, cmd_correlate, cmd_lmm, cmd_report, cmd_synth_curve, cmd_synth_survey, cmd_tpa
from .manifest import build_manifest, write_manifest

__all__ = [
    "cmd_tpa",
    "cmd_ca",
    "cmd_correlate",
    "cmd_lmm",
    "cmd_report",
    "cmd_synth_curve",
    "cmd_synth_survey",
    "build_manifest",
    "write_manifest",
]
