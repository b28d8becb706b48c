DEFAULT_GROUP_SIZE = 64
MAX_LANES_PER_WORD = 64
MIN_MANTISSA_LEN = 1
MAX_MANTISSA_LEN = 16
FP16_FRACTION_BITS = 10
FP16_EXP_BIAS = 15
FP16_SUBNORMAL_EXP = -14
ALL_ZERO_SHARED_EXP = -15

WEIGHT_GROUP_SIZE = 128
WEIGHT_BITS = 4
# one FP16 x INT4 multiply is costed as 16 * 4 BOPs
FP16_EQUIV_MANTISSA = 16

ANDA_MAGIC = b"ANDA"
ANDT_MAGIC = b"ANDT"
CONTAINER_VERSION = 1
ANDA_HEADER_FORMAT = "<4sHHHHIII"
ANDT_HEADER_FORMAT = "<4sHHI"
ANDT_DTYPE_CODES = {"float16": 0, "float32": 1, "int8": 2}

DEFAULT_MAX_ITERS = 32
DEFAULT_INIT_LO = 4
DEFAULT_INIT_HI = 13
DEFAULT_MANTISSA_FLOOR = 1
DEFAULT_SENSITIVITY_FIXED = 13

DEFAULT_TOKENS = 2048
DEFAULT_GEN_TOKENS = 128
DEFAULT_SEED = 0

WORKLOAD_META_FILE = "ANDA_WORKLOAD.json"
MANIFEST_SUFFIX = ".manifest.json"
OUTPUT_SCHEMA_VERSION = "anda-io/1"

DEFAULT_ORACLE_TIMEOUT_S = 30.0
DEFAULT_ORACLE_RESTARTS = 2
DEFAULT_POLL_INTERVAL_S = 0.05
