"""Community crop-surveillance campaign platform.

Modules
-------
registry    candidate rosters, selection criteria, devices, leader elections
ingestion   geo-tagged report intake, dedupe, ordinals, JSONL store, endpoint
incentives  tiered pricing, batch vesting, payout ledger, mobile-money client
evaluation  comment keyword extraction, diagnosis rules, confusion matrices
analytics   demographic/temporal aggregation, spatial density, GeoJSON export
simulator   deterministic seeded campaigns exercising the whole pipeline
cli         batch subcommands and the serve process
fixtures    bundled reference roster and diagnosis tallies
"""

__version__ = "0.1.0"
