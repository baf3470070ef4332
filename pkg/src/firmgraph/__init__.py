"""Attack-graph based risk assessment for multi-binary firmware images."""

from .datalog import (
    ArityConflictError,
    Clause,
    DatalogSyntaxError,
    Literal,
    Program,
    ProgramError,
    Term,
    TermKind,
    constant,
    fact,
    format_clause,
    format_literal,
    parse_clause,
    parse_program,
    program_from_clauses,
    variable,
    wildcard,
)
from .engine import (
    DEFAULT_DERIVATION_CAP,
    Derivation,
    DerivationLimitError,
    DerivationSet,
    evaluate,
)
from .errors import ConfigError, FirmgraphError, SchemaError
from .proof import (
    NodeKind,
    ProofDetail,
    ProofGraph,
    ProofNode,
    UnknownGoalError,
    build_proof_detail,
    build_proof_graph,
)
from .attackgraph import (
    AgMetrics,
    AttackGraph,
    AttackPath,
    UnknownTargetError,
    apply_patch,
    enumerate_paths,
    export_dot,
    export_json,
    generate_ag,
    metrics,
    whatif_patch,
)
from .firmware import (
    BinaryInventory,
    FirmwareGraph,
    TopologyFacts,
    emit_topology_facts,
    load_firmware_graph,
    load_version_list,
    merge_inventory,
)
from .pipeline import AnalysisResult, IntelBundle, analyze_document, load_intel_bundle
from .risk import (
    BinaryRiskRow,
    CorpusStats,
    binary_risk_table,
    corpus_stats,
    impact,
    risk_score,
)
from .rules import Ruleset, get_ruleset
from .vulnintel import (
    CveDatabase,
    CveRecord,
    ExploitIntel,
    VulnMatch,
    detect_oss,
    emit_vul_facts,
    likelihood,
    load_cve_db,
    match_vulnerabilities,
)

__version__ = "0.1.0"

__all__ = [
    "AgMetrics",
    "AnalysisResult",
    "ArityConflictError",
    "AttackGraph",
    "AttackPath",
    "BinaryInventory",
    "BinaryRiskRow",
    "Clause",
    "ConfigError",
    "CorpusStats",
    "CveDatabase",
    "CveRecord",
    "DatalogSyntaxError",
    "DEFAULT_DERIVATION_CAP",
    "Derivation",
    "DerivationLimitError",
    "DerivationSet",
    "ExploitIntel",
    "FirmgraphError",
    "FirmwareGraph",
    "IntelBundle",
    "Literal",
    "NodeKind",
    "Program",
    "ProgramError",
    "ProofDetail",
    "ProofGraph",
    "ProofNode",
    "Ruleset",
    "SchemaError",
    "Term",
    "TermKind",
    "TopologyFacts",
    "UnknownGoalError",
    "UnknownTargetError",
    "VulnMatch",
    "analyze_document",
    "apply_patch",
    "binary_risk_table",
    "build_proof_detail",
    "build_proof_graph",
    "constant",
    "corpus_stats",
    "detect_oss",
    "emit_topology_facts",
    "emit_vul_facts",
    "enumerate_paths",
    "evaluate",
    "export_dot",
    "export_json",
    "fact",
    "format_clause",
    "format_literal",
    "generate_ag",
    "get_ruleset",
    "impact",
    "likelihood",
    "load_cve_db",
    "load_firmware_graph",
    "load_intel_bundle",
    "load_version_list",
    "match_vulnerabilities",
    "merge_inventory",
    "metrics",
    "parse_clause",
    "parse_program",
    "program_from_clauses",
    "risk_score",
    "variable",
    "whatif_patch",
    "wildcard",
    "__version__",
]
