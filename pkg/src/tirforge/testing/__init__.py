"""Test doubles: a scriptable wire-protocol executor stub."""
