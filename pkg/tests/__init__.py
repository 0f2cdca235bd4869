"""Tests for the fraclr package."""
