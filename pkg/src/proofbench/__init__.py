"""proofbench: a teaching platform backend for proof assistants.

Checks student theories through a prover wire protocol (real or mock),
restricts the input language per learning activity, records interaction
telemetry and computes didactic analytics over it.
"""

__version__ = "0.1.0"
