"""The fixed seven-stage taxonomy of analysis behavior.

Versioned: appending or renaming stages requires a bump and migration of
stored trajectories and checklists.
"""

TAXONOMY_VERSION = 1

STAGES = (
    "analysis_planning",
    "data_exploration",
    "event_identification",
    "synoptic_analysis",
    "mesoscale_analysis",
    "thermodynamic_analysis",
    "final_report",
)

# Stages whose steps are expected to carry figures and interpretations.
DIAGNOSTIC_STAGES = (
    "event_identification",
    "synoptic_analysis",
    "mesoscale_analysis",
    "thermodynamic_analysis",
)


def is_stage(label: str) -> bool:
    return label in STAGES
