"""Command line entry point: serve, migrate, openapi."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import AppConfig, ConfigError
from .detectors.registry import build_default_registry


def load_config(path: str | None) -> AppConfig:
    detector_ids = build_default_registry().ids()
    if path:
        config = AppConfig.from_file(path)
        config.resolve_adapter_urls(detector_ids)
        return config
    return AppConfig.from_env(known_detector_ids=detector_ids)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="fakefinder",
        description="Detection service for AI-generated images and audio",
    )
    parser.add_argument("--config", help="JSON config file (environment otherwise)")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("serve", help="run the HTTP gateway")
    sub.add_parser("migrate", help="apply pending store migrations and exit")
    sub.add_parser("openapi", help="print the API description and exit")
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s %(levelname)s %(message)s")
    try:
        config = load_config(args.config)
        if args.command == "serve":
            from .gateway import serve

            serve(config)
        elif args.command == "migrate":
            from .persistence import Database

            version = Database(config.store_url).migrate()
            print(f"store at schema version {version}")
        elif args.command == "openapi":
            from .gateway import create_app, openapi_document

            sys.stdout.write(openapi_document(create_app(config)))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
