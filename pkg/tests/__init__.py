"""Tests for FeatureScript sync system."""
