"""Multi-objective black-box optimization over learned search-space partitions.

Samples are ranked by dominance number, a tree of SVM classifiers splits the
space into good and bad regions, UCB picks a promising leaf, and a sampler
(random, CMA-ES or MC-EHVI) draws the next batch inside it.
"""
from .benchmarks import (BenchmarkError, ContinuousBenchmark, TabularBenchmark, branin_currin,
                         eval_branin_currin, evaluate, gen_synthetic_nas, load_tabular)
from .core import (Archive, EvaluatedSample, NormalizationSpec, ObjectiveSpec, SearchDomain,
                   denormalize_objectives, domain_contains, normalize_objectives)
from .harness import (ExperimentConfig, RunResult, emit_csv, emit_plot, region_quality_experiment,
                      run_experiment)
from .hypervolume import (HvConfig, ReferencePoint, hv_exact_2d, hv_exact_3d, hv_monte_carlo,
                          hypervolume, log_hv_diff)
from .pareto import DominanceReport, dominance_counts, dominance_numbers, dominates, pareto_front
from .partition import (PartitionParams, PartitionTree, SpacePartitioner, TreeNode, build_tree,
                        label_samples, region_membership, split_node)
from .selection import SelectionConfig, SelectionOutcome, backpropagate, select_leaf, select_path, ucb
from .svm import KernelSpec, NotSplittable, SMOClassifier, decision_value, predict, train_svm

__version__ = "0.1.0"
