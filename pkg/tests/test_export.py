import numpy as np

from recad.export import grid_from_bytes, grid_to_bytes, mesh_to_obj
from recad.solid import model_mesh, voxelize

from conftest import box_model, cube_minus_cylinder
from modelgen import random_model


class TestObj:
    def test_cube_counts(self, unit_cube):
        text = mesh_to_obj(model_mesh(unit_cube))
        lines = text.splitlines()
        assert sum(1 for l in lines if l.startswith("v ")) == 8
        assert sum(1 for l in lines if l.startswith("f ")) == 12

    def test_deterministic(self):
        m = cube_minus_cylinder()
        assert mesh_to_obj(model_mesh(m)) == mesh_to_obj(model_mesh(m))

    def test_groups_per_pair(self):
        m = cube_minus_cylinder()
        text = mesh_to_obj(model_mesh(m))
        assert "g pair0" in text and "g pair1" in text

    def test_indices_in_range(self):
        for seed in range(3):
            mesh = model_mesh(random_model(seed))
            text = mesh_to_obj(mesh)
            nv = len(mesh.vertices)
            for line in text.splitlines():
                if line.startswith("f "):
                    idx = [int(x) for x in line.split()[1:]]
                    assert all(1 <= i <= nv for i in idx)


class TestVoxelBinary:
    def test_roundtrip(self, unit_cube):
        grid = voxelize(unit_cube, 32)
        back = grid_from_bytes(grid_to_bytes(grid))
        assert back.dims == grid.dims
        assert back.cell == grid.cell
        assert back.origin == grid.origin
        assert back.center == grid.center
        assert np.array_equal(back.occupancy, grid.occupancy)

    def test_roundtrip_random(self):
        for seed in range(3):
            grid = voxelize(random_model(seed), 16)
            back = grid_from_bytes(grid_to_bytes(grid))
            assert np.array_equal(back.occupancy, grid.occupancy)

    def test_all_empty_and_full(self):
        from recad.model import Vec3
        from recad.solid import VoxelGrid

        for fill in (False, True):
            occ = np.full((8, 8, 8), fill, dtype=bool)
            grid = VoxelGrid(Vec3(0, 0, 0), 0.5, (8, 8, 8), occ)
            back = grid_from_bytes(grid_to_bytes(grid))
            assert np.array_equal(back.occupancy, occ)

    def test_bad_magic_rejected(self):
        import pytest

        from recad.errors import JsonFormatError

        with pytest.raises(JsonFormatError):
            grid_from_bytes(b"XXXX" + b"\x00" * 100)
