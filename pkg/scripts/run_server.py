#!/usr/bin/env python3
"""
Start the tetrablock verifier API with uvicorn
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import argparse

import uvicorn
from app.config import API_HOST, API_PORT, LOG_LEVEL


def parse_args(argv=None):
    p = argparse.ArgumentParser(description="Serve the verifier API.")
    p.add_argument("--host", default=API_HOST)
    p.add_argument("--port", type=int, default=API_PORT)
    p.add_argument("--reload", action="store_true", help="Restart on source changes.")
    return p.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    print(f"Starting tetrablock verifier on {args.host}:{args.port}")
    uvicorn.run("app.main:app", host=args.host, port=args.port, reload=args.reload,
                log_level=LOG_LEVEL.lower())
    return 0

if __name__ == "__main__":
    sys.exit(main())
