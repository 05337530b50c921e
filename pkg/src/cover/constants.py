HASH_NAME = 'sha256'
DIGEST_SIZE = 32

# domain separation tags
LEAF_TAG = b'\x00'
NODE_TAG = b'\x01'
SYMBOL_TAG = b'\x02'

# merkle proof sides
LEFT = 0
RIGHT = 1

# coded merkle tree geometry
GROUP_SIZE = 4
UPPER_SYMBOL_SIZE = GROUP_SIZE * DIGEST_SIZE
TOP_LAYER_WIDTH = 4
ROOT_LAYER = 1
DEFAULT_SYMBOL_SIZE = 512

# ldpc defaults
DEFAULT_D_L = 3
DEFAULT_D_R = 6
MAX_ENCODE_RETRIES = 16
EXHAUSTIVE_LIMIT = 24

# ledger
ACCOUNT_SIZE = 32
MAX_TXN_INPUTS = 16
MAX_TXN_OUTPUTS = 16
MAX_AMOUNT = 2**64 - 1
NEVER_EXPIRES = None

# transaction checks, in the order they run
CHECK_SIGNATURE = 'signature'
CHECK_SUMS = 'sums'
CHECK_INPUT_PROOFS = 'input_proofs'
CHECK_SPENT = 'spent'

# network
DEFAULT_DELTA = 2
INTEREST_ENTRY_SIZE = 6

# message channels
HEADER = 'header'
SYMBOL = 'symbol'
FRAUD_PROOF = 'fraud_proof'
CODING_FRAUD = 'coding_fraud'
INTEREST = 'interest'

# verdicts
PENDING = 'pending'
ACCEPT = 'accept'
REJECT = 'reject'

# verdict reasons
VALID = 'valid'
UNAVAILABLE = 'unavailable'
SAMPLING_TIMEOUT = 'sampling_timeout'
MALFORMED_HEADER = 'malformed_header'

# miner strategies
HONEST = 'honest'
HIDE_STOPPING_SET = 'hide_stopping_set'
CODING_FRAUD_MINER = 'coding_fraud'
INVALID_TXN = 'invalid_txn'
WITHHOLD_RANDOM = 'withhold_random'

# invalid transaction classes
BAD_SIG = 'bad_sig'
BAD_SUM = 'bad_sum'
BAD_INPUT_PROOF = 'bad_input_proof'
DOUBLE_SPEND = 'double_spend'
EXPIRED = 'expired'
UNSORTED = 'unsorted'

INVALID_TXN_CLASSES = (
    BAD_SIG, BAD_SUM, BAD_INPUT_PROOF, DOUBLE_SPEND, EXPIRED, UNSORTED
)

# byzantine node strategies
SILENT = 'silent'
DROP_SELECTIVE = 'drop_selective'
FAKE_SYMBOL_SPAM = 'fake_symbol_spam'
FAKE_FRAUD_PROOF_SPAM = 'fake_fraud_proof_spam'

# experiment defaults
DEFAULT_TAU = 16
DEFAULT_LAMBDA = 2.0
SCALAR_TRIALS = 10_000
CONNECTIVITY_TRIALS = 200
ROUND_TRIALS = 500
WILSON_Z = 1.96

# base symbol size of simulated blocks; holds a transaction with its input
# proofs and funding bytes
DEFAULT_TXN_SYMBOL_SIZE = 2048
