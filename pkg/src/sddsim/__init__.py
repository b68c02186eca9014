"""
Semantics-division duplexing link simulator.

Feature packages mirror the processing chain: `signal_core` -> `channel` ->
(`baseline_chain` | `semantic_chain`) -> `sic` -> `duplex_sim`, with
`metrics`, `feasibility` and the `harness` CLI on top.
"""

__version__ = "0.1.0"
