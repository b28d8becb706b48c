class ModuleNames:
    QKV = "qkv"
    O = "o"
    U = "u"
    D = "d"
    ALL = (QKV, O, U, D)


class FamilyNames:
    OPT = "opt"
    LLAMA = "llama"
    ALL = (OPT, LLAMA)


class PlatformNames:
    FPFP = "fpfp"
    FPINT = "fpint"
    IFPU = "ifpu"
    FIGNA = "figna"
    ANDA = "anda"


class OracleNames:
    PROXY = "proxy"
    EXEC = "exec"
    FILES = "files"
    THRESHOLD = "threshold"
    FUNCTION = "function"


class HalfClass:
    ZERO = "zero"
    SUBNORMAL = "subnormal"
    NORMAL = "normal"
    INFINITY = "infinity"
    NAN = "nan"


class DtypeNames:
    FLOAT16 = "float16"
    FLOAT32 = "float32"
    INT8 = "int8"


class Provenance:
    PUBLISHED = "published"
    DERIVED = "derived"
    ASSUMPTION = "assumption"
    ALL = (PUBLISHED, DERIVED, ASSUMPTION)


# evaluation request for the unquantized FP16 path
FP16_SENTINEL = "fp16"
