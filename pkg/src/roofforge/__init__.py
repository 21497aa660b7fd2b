"""roofforge: planar roof reconstruction from roof graphs and dual graphs.

Core surface: graph types and conversions (`graph`), energies (`energy`),
the solve pipeline (`solver`), interactive editing (`editing`), adjacency
ambiguity resolution (`adjacency`), file formats and export (`fileio`), the
CLI (`cli`), and the local HTTP service (`service`).
"""

from .adjacency import AdjacencyCandidate, CandidateSet, resolve_greedy, resolve_sampling
from .editing import (AffectedRegion, EditJournal, EditOp, apply_edit,
                      edit_and_reoptimize, reoptimize_region,
                      smallest_affected_region)
from .energy import (EnergyValue, aesthetic_energy, face_planarity,
                     roof_planarity, validity_energy_2d, variance_energy)
from .errors import RoofForgeError
from .fileio import (BuildingMesh, RoofGraphDocument, dumps_dualgraph,
                     dumps_roofgraph, export_building, load_dualgraph,
                     load_roofgraph, loads_dualgraph, loads_roofgraph,
                     save_dualgraph, save_roofgraph)
from .graph import (BISECTOR, OTHER, OUTLINE, RIDGE, ROOF, DualGraph,
                    Embedding, RoofGraph, ValidityReport, VertexRecord,
                    check_realizable, check_validity_2d, classify_roof_edges,
                    dual_from_primal, exterior_test, outline_embedding,
                    primal_from_dual)
from .solver import (SolveResult, SolveSpec, lift_2d_to_3d, optimize_dual,
                     optimize_primal, optimize_variable_heights,
                     preprocess_outline, spectral_embed_2d)

__version__ = "0.1.0"
