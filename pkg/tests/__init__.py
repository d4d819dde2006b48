"""Tests for MFEA-RL."""
