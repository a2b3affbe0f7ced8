"""Fire dynamics on uniform random labeled trees.

Edges of a tree on n labeled vertices are processed in a uniform random
order; each still-flammable edge is fireproofed with probability 1 - p or
ignited with probability p, an ignition burning the whole flammable
component around it.  The package provides two independent engines for the
process (a direct simulator and a cut-tree pipeline coupled to it exactly),
samplers for the limit objects in the subcritical, critical and
supercritical regimes, and the statistical machinery used to verify the
limit claims at desk scale.
"""

from .cuttree import (CutTree, MarkSet, build_cut_tree, mark_and_erase,
                      read_outcome, worked_example)
from .dynamics import (DynamicsOutcome, first_fire_step, run_dynamics,
                       run_forward, run_marked_process,
                       subtree_forest_at_first_fire)
from .limitlaws import (JumpSequence, RootedMarkOutcome, borel_pmf,
                        borel_tanner_pmf, chi2_1_cdf, conditioned_borel_vector,
                        conditioned_jumps, critical_limit_sample, d_cdf,
                        d_cdf_quadrature, d_density, inv_chi2_1_cdf,
                        joint_root_marks_pmf, joint_root_marks_table,
                        mu_x_sample, ranked_jumps, rooted_mark_batch,
                        rooted_mark_outcome, sample_borel, sample_chi2_1,
                        sample_d, sample_inv_chi2_1, stable_jump_atoms,
                        stable_tail_mass_bound, subcritical_limit_components,
                        subcritical_limit_sample, supercritical_limit_sequence,
                        verify_d_representation)
from .stats import (ExactLaw, RankedCompareReport, brute_force_oracle,
                    chi_square_test, ks_distance, ks_distance_2samp,
                    ranked_l1_compare)
from .streams import stream
from .treegen import (LabeledTree, PruferSequence, enumerate_trees,
                      prufer_decode, prufer_encode, sample_uniform_tree)

__version__ = "0.1.0"

__all__ = [
    "CutTree", "MarkSet", "build_cut_tree", "mark_and_erase", "read_outcome",
    "worked_example",
    "DynamicsOutcome", "first_fire_step", "run_dynamics", "run_forward",
    "run_marked_process", "subtree_forest_at_first_fire",
    "JumpSequence", "RootedMarkOutcome", "borel_pmf", "borel_tanner_pmf",
    "chi2_1_cdf", "conditioned_borel_vector", "conditioned_jumps",
    "critical_limit_sample", "d_cdf", "d_cdf_quadrature", "d_density",
    "inv_chi2_1_cdf", "joint_root_marks_pmf", "joint_root_marks_table",
    "mu_x_sample", "ranked_jumps", "rooted_mark_batch", "rooted_mark_outcome",
    "sample_borel", "sample_chi2_1", "sample_d", "sample_inv_chi2_1",
    "stable_jump_atoms", "stable_tail_mass_bound",
    "subcritical_limit_components", "subcritical_limit_sample",
    "supercritical_limit_sequence", "verify_d_representation",
    "ExactLaw", "RankedCompareReport", "brute_force_oracle",
    "chi_square_test", "ks_distance", "ks_distance_2samp", "ranked_l1_compare",
    "stream",
    "LabeledTree", "PruferSequence", "enumerate_trees", "prufer_decode",
    "prufer_encode", "sample_uniform_tree",
]
