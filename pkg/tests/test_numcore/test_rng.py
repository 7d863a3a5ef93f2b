import numpy as np

from hedgebench.numcore import RngStream, gaussian, uniform


def test_empty_draw():
    assert gaussian(RngStream(7, 0), 0).shape == (0,)


def test_gaussian_moments():
    z = gaussian(RngStream(7, 0), 10**6)
    assert abs(np.mean(z)) < 4e-3
    assert abs(np.var(z) - 1) < 0.01


def test_same_stream_is_bit_identical():
    a = gaussian(RngStream(123, 4), 1000)
    b = gaussian(RngStream(123, 4), 1000)
    assert a.tobytes() == b.tobytes()


def test_streams_differ():
    a = gaussian(RngStream(123, 0), 1000)
    b = gaussian(RngStream(123, 1), 1000)
    c = gaussian(RngStream(124, 0), 1000)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)
    # independent streams are uncorrelated
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.15


def test_counter_continues_stream():
    full = gaussian(RngStream(1, 2), 10)
    stream = RngStream(1, 2, counter=4)
    np.testing.assert_array_equal(gaussian(stream, 6), full[4:])
    assert stream.counter == 10


def test_uniform_open_interval():
    u = uniform(RngStream(0, 0), 10**5)
    assert u.min() > 0 and u.max() < 1


def test_sequential_draws_concatenate():
    stream = RngStream(9, 9)
    parts = np.concatenate([gaussian(stream, 3), gaussian(stream, 5)])
    np.testing.assert_array_equal(parts, gaussian(RngStream(9, 9), 8))
