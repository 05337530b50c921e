STANDARD_SCENARIOS = {
    "theorem-valid": {
        "L": 64,
        "k": 4,
        "N_h": 40,
        "miner": {"kind": "honest"},
        "trials": 500,
    },
    "theorem-unavailable": {
        "L": 64,
        "k": 4,
        "N_h": 40,
        "miner": {"kind": "hide_stopping_set"},
        "trials": 500,
    },
    "theorem-coding-fraud": {
        "L": 64,
        "k": 4,
        "N_h": 40,
        "miner": {"kind": "coding_fraud", "check_id": 0},
        "trials": 100,
    },
    "theorem-invalid": {
        "L": 64,
        "k": 4,
        "N_h": 40,
        "miner": {"kind": "invalid_txn", "txn_class": "double_spend"},
        "trials": 500,
    },
    "withhold-below-threshold": {
        "L": 64,
        "k": 4,
        "N_h": 40,
        "miner": {"kind": "withhold_random"},
        "trials": 100,
    },
    "byzantine-silent": {
        "L": 64,
        "k": 4,
        "N_h": 40,
        "alpha": 0.2,
        "miner": {"kind": "honest"},
        "byzantine": [{"kind": "silent"}],
        "trials": 100,
    },
    "byzantine-spam": {
        "L": 64,
        "k": 4,
        "N_h": 40,
        "alpha": 0.2,
        "miner": {"kind": "honest"},
        "byzantine": [
            {"kind": "fake_symbol_spam", "rate": 1},
            {"kind": "fake_fraud_proof_spam", "rate": 1},
        ],
        "trials": 100,
    },
    "smoke": {
        "L": 8,
        "k": 2,
        "N_h": 6,
        "p": 1.0,
        "symbol_size": 2048,
        "miner": {"kind": "honest"},
        "trials": 2,
    },
}
