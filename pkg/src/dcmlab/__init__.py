"""Directed configuration model lab: sampling, SCCs, exploration, theory and exact oracles."""

from dcmlab.degseq import BiDegreeSequence, FamilySpec, build_family, compute_params
from dcmlab.sampler import MultiDigraph, StubMatching, sample_configuration
from dcmlab.scc import analyze, decompose
from dcmlab.theory import kth_largest_tail, xi_alpha

__version__ = "0.1.0"
