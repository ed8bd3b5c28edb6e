"""Module chính cho target mô phỏng bảng match-action."""

import argparse
import asyncio
import logging
import sys

from config import Config
from runtime.errors import RuntimeControlError
from runtime.schema import load_schema
from switch.server import serve
from switch.state import TargetState
from utils.log_utils import configure_logging
from utils.time_utils import duration_arg

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Simulated match-action target.")
    parser.add_argument('--schema', default=Config.TARGET_SCHEMA_PATH,
                        help='Program schema (JSON) served by the target')
    parser.add_argument('--listen', default=Config.TARGET_LISTEN, help='host:port to bind')
    parser.add_argument('--response-delay', '--response-delay-ms', dest='response_delay',
                        type=duration_arg, default=Config.TARGET_RESPONSE_DELAY_MS / 1000,
                        help='Delay injected before every acknowledgment (500us, 2ms, 1s; bare = ms)')
    parser.add_argument('--log-level', default=Config.LOG_LEVEL)
    return parser


def main(argv=None) -> int:
    """Phân tích tham số, cấu hình logging và khởi động target."""
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    try:
        schema = load_schema(args.schema)
    except (OSError, RuntimeControlError) as e:
        logger.error("Cannot load schema %s: %s", args.schema, e)
        return 1

    try:
        state = TargetState(schema, args.response_delay)
    except ValueError as e:
        logger.error("Invalid response delay: %s", e)
        return 2
    try:
        asyncio.run(serve(state, args.listen))
    except KeyboardInterrupt:
        logger.info("Interrupted, target stopped.")
    except (OSError, ValueError) as e:
        logger.error("Cannot serve on %s: %s", args.listen, e)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
