"""Test suite for mmbench."""
