"""Tests for linkshadows."""
