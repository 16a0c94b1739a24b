import sys
import asyncio

from handlers.commands import run_command
from utils.app_setup import setup_logging

# Setup logging
logger = setup_logging()


async def main(argv=None) -> int:
    """Command-line entry point"""
    return await run_command(argv)


if __name__ == "__main__":
    try:
        sys.exit(asyncio.run(main()))
    except KeyboardInterrupt:
        logger.info("🛑 Stopped by user")
        sys.exit(130)
    except Exception as e:
        logger.error(f"❌ Unexpected error: {e}")
        sys.exit(1)
