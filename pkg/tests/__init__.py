"""Test suite package for ooskge."""
