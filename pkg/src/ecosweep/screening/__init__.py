"""Phase-1 model-based screening over a replicated run dataset."""

from ecosweep.screening.aleatoric import AleatoricReport, bayes_limit, replicate_median
from ecosweep.screening.anova import AnovaResult, anova_type2, chi2_seed_independence
from ecosweep.screening.replication import ReplicationReport, required_replicates
from ecosweep.screening.tree import (
    RegressionTree,
    TreeNode,
    extract_thresholds,
    fit_tree,
    format_rules,
)

__all__ = [
    "AleatoricReport",
    "AnovaResult",
    "RegressionTree",
    "ReplicationReport",
    "TreeNode",
    "anova_type2",
    "bayes_limit",
    "chi2_seed_independence",
    "extract_thresholds",
    "fit_tree",
    "format_rules",
    "replicate_median",
    "required_replicates",
]
