"""
Utils module - Shared utilities for pifmhd

This module provides common utilities used across the project:
- logging_helper: Consistent logging setup
- paths: Project folders (outputs, logs, run configs)
- io_helpers: File I/O with proper encoding
- parallel: Deterministic chunked thread pool
"""
