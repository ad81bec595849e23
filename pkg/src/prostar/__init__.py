"""Coherent nets of finite-dimensional Hilbert spaces over directed posets, and their dilations."""

from .poset import DirectedPoset, branch, chain, maximum, product_poset, validate_poset
from .lochilbert import LocalVector, LocallyHilbertSpace, embed, inner_product, make_space, tensor_space
from .locop import (LocallyBoundedOperator, adjoint, apply, check_locally_bounded, compose, identity,
                    is_locally_positive, is_locally_selfadjoint, is_locally_unitary, seminorm, tensor_op)
from .localg import (ConcreteLocallyCStarAlgebra, MatrixProjectiveSystem, algebra_seminorm, bounded_norm,
                     check_coherent_morphism, gelfand_naimark_rep, make_algebra, spatial_tensor)
from .kernel import (OperatorKernel, SemigroupAction, StarSemigroup, is_hermitian, is_invariant, is_n_positive,
                     is_positive_semidefinite, kernel_from_cp_map, sznagy_bound)
from .dilation import (InvariantDilation, KolmogorovDecomposition, invariant_dilation, kolmogorov, minimalize,
                       reproducing_kernel_space, stinespring, unitary_equivalence)
from .csmodule import (AbstractHilbertModule, ConcreteHilbertModule, check_module, exterior_tensor,
                       module_seminorm, operator_model)

__version__ = "0.1.0"
