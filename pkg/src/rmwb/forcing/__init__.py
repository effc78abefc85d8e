"""Forcing-condition calculi: sequence pairs, transitive-set triples, ground conditions and requirement tables."""

from .ads import (AdsCondition, AdsReport, EssentialReport, SplitPairError, ads_extends, ads_problems,
                  bounded_essential_ads, bounded_essential_in, split_blocks, split_pair_select, split_pairs,
                  validate_ads)
from .em import (DensityViolation, EmCondition, EmEssentialReport, SettleBounds, SettleCertificate, SettleReport,
                 UndefinedAValue, bounded_essential_em, em_extension_problems, em_problems, level_dense,
                 settle_extend, settles_check, validate_em, validate_em_extension)
from .ground import (DiagonalizeResult, GroundColoringCondition, GroundPosetCondition, empty_condition,
                     extension_problems, ground_decide, ground_diagonalize, ground_extends, ground_problems,
                     parse_ground, serialize_ground, verify_diagonalize)
from .tables import (BUILTINS, FLAVORS, FunctionalTable, RequirementTable, TableError, extends_code,
                     parse_functional, parse_table, requirement_member, serialize_functional, serialize_table)
from .tree import (BadSetPredicate, PartitionTable, TreePreconditionError, TreeResult, build_tree,
                   partition_path_tree, verify_tree)
