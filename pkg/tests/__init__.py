"""Test suite for newellcast"""
