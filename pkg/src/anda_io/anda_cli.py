#!/usr/bin/env python3

import argparse
import json
import os
import sys
import time
import traceback
import warnings

import sentry_sdk
from dotenv import find_dotenv, load_dotenv
from opentelemetry import trace
from opentelemetry.propagate import set_global_textmap
from opentelemetry.sdk.trace import TracerProvider
from pydantic import ValidationError
from sentry_sdk.integrations.opentelemetry import SentryPropagator, SentrySpanProcessor
from tqdm import tqdm

import anda_io
from anda_io.commands import load_subclasses
from anda_io.commands.command_cls import ARGS_ALLOWLIST
from anda_io.errors import AndaError

slug_to_run_func, slug_to_parser_func = load_subclasses("anda_io.commands")

warnings.filterwarnings("ignore", module="numpy")
warnings.simplefilter("ignore", DeprecationWarning)

load_dotenv(find_dotenv(usecwd=True), override=True)


def telemetry_enabled() -> bool:
    return bool(os.environ.get("ANDA_SENTRY_DSN")) and os.environ.get("ANDA_DISABLE_TELEMETRY", "0") != "1"


if telemetry_enabled():
    sentry_sdk.init(
        dsn=os.environ["ANDA_SENTRY_DSN"],
        enable_tracing=True,
        # set the instrumenter to use OpenTelemetry instead of Sentry
        instrumenter="otel",
        default_integrations=False,
    )
    provider = TracerProvider()
    provider.add_span_processor(SentrySpanProcessor())
    trace.set_tracer_provider(provider)
    set_global_textmap(SentryPropagator())

tracer = trace.get_tracer(__name__)


def one_line(e: Exception) -> str:
    return "; ".join(line.strip() for line in str(e).splitlines() if line.strip())


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anda",
        description="Anda variable-length grouped activation format: encoding, precision search and accelerator cost model",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {anda_io.__version__}")
    subparsers = parser.add_subparsers(title="Commands", dest="command")
    for slug in slug_to_parser_func:
        slug_to_parser_func[slug](subparsers)
    return parser


def run_command(span, argv=None) -> int:
    parser = make_parser()
    args = vars(parser.parse_args(argv))
    args["library_version"] = anda_io.__version__
    if args.get("command") not in slug_to_run_func:
        parser.print_help()
        return 2

    t_start = time.time()
    code = slug_to_run_func[args["command"]](args)
    args["exit_code"] = code
    for key in ARGS_ALLOWLIST:
        if args.get(key) is not None:
            span.set_attribute(key, args[key])
    span.set_attribute("run_time", time.time() - t_start)
    return code


def main(argv=None):
    with tracer.start_as_current_span("anda_cli_main") as span:
        try:
            code = run_command(span, argv)
        except AndaError as e:
            print(f"Error: {one_line(e)}", file=sys.stderr)
            code = e.EXIT_CODE
        except (ValidationError, json.JSONDecodeError) as e:
            print(f"Error: {one_line(e)}", file=sys.stderr)
            code = 2
        except KeyboardInterrupt:
            tqdm.write("Interrupted")
            code = 130
        except Exception as e:
            print(f"Error: {e}", file=sys.stderr)
            traceback.print_exc()
            code = 1
        finally:
            sentry_sdk.flush()
    sys.exit(code)


if __name__ == "__main__":
    main()
