import unittest

from grd import words
from grd.words import Word


class TestWords(unittest.TestCase):
    def test_parse_and_str(self):
        w = Word.parse('a1 A2 a2 a1', 2)
        assert str(w) == 'a1 a1'
        assert str(Word.parse('e', 3)) == 'e'
        assert len(Word.parse('', 2)) == 0

    def test_parse_rejects_garbage(self):
        with self.assertRaises(ValueError):
            Word.parse('b1', 2)
        with self.assertRaises(ValueError):
            Word.parse('a3', 2)

    def test_unreduced_letters_rejected(self):
        with self.assertRaises(ValueError):
            Word(2, ((1, 1), (1, -1)))

    def test_multiply_cancels_at_junction(self):
        a = Word.parse('a1 a2', 2)
        b = Word.parse('A2 a1', 2)
        assert a * b == Word.parse('a1 a1', 2)
        assert a * a.inverse() == words.identity(2)

    def test_rank_mismatch(self):
        with self.assertRaises(ValueError):
            words.multiply(Word.parse('a1', 1), Word.parse('a1', 2))
        with self.assertRaises(TypeError):
            words.multiply(Word.parse('a1', 1), 'a1')

    def test_phi_hom(self):
        w = Word.parse('a1 a2 A1', 2)
        assert words.phi_hom(w) == 1
        assert words.phi_hom(w, -1) == -1
        for u in words.ball(2, 2):
            for v in words.ball(2, 2):
                assert words.phi_hom(u * v) == words.phi_hom(u) + words.phi_hom(v)
        with self.assertRaises(ValueError):
            words.phi_hom(w, 2)

    def test_uv_normal_form(self):
        u, v = words.uv_normal_form(Word.parse('a1 a2 A1', 2))
        assert str(u) == 'a1 a2'
        assert str(v) == 'a1'
        assert words.uv_normal_form(Word.parse('A1 a2', 2)) is None

    def test_forbidden_subword(self):
        assert words.has_forbidden_subword(Word.parse('A1 a2', 2))
        assert not words.has_forbidden_subword(Word.parse('a1 A2', 2))
        clean = [w for w in words.ball(2, 3) if not words.has_forbidden_subword(w)]
        assert all(words.uv_normal_form(w) is not None for w in clean)

    def test_ball_sizes(self):
        for rank in (1, 2, 3):
            for radius in range(4):
                assert len(words.ball(rank, radius)) == words.ball_size(rank, radius)
        assert words.ball_size(2, 2) == 17
        assert len(list(words.sphere(2, 3))) == 36
