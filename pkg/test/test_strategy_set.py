import pytest
import yaml

from spiralscan.errors import InvalidScanSpecification
from spiralscan.strategies import FermatStrategy, RasterStrategy, RectSpiralStrategy
from spiralscan.strategy_set import StrategySet, parse_strategy_set, strategy_dictionary_to_string, \
    is_a_valid_strategy_set


class TestStrategySet:
    def test_default(self) -> None:
        strategies = StrategySet(None)
        assert list(strategies) == ["raster", "rect", "fermat"]
        assert strategies["fermat"] == FermatStrategy()

    def test_string(self) -> None:
        strategies = StrategySet("raster fermat,lambda_c=0.3")
        assert list(strategies) == ["raster", "fermat"]
        assert strategies["fermat"]["lambda_c"] == 0.3

    def test_labels(self) -> None:
        strategies = StrategySet("a:raster b:fermat,mode=exhaustive c:fermat,lambda_c=1")
        assert list(strategies) == ["a", "b", "c"]
        assert strategies["a"] == RasterStrategy()
        assert strategies["b"]["mode"] == "exhaustive"

    def test_dictionary(self) -> None:
        strategies = StrategySet({"baseline": "raster", "ring": "rect"})
        assert strategies["ring"] == RectSpiralStrategy()
        assert len(strategies) == 2

    def test_yaml_file(self, tmp_path) -> None:
        strategy_file = tmp_path / "strategies.yaml"
        with strategy_file.open("w") as stream:
            yaml.dump({"raster": "raster", "greedy": "fermat,lambda_c=1.0"}, stream, sort_keys=False)
        # Pass the file path, either as a Path or as a string
        for argument in (strategy_file, str(strategy_file)):
            strategies = StrategySet(argument)
            assert list(strategies) == ["raster", "greedy"]
            assert strategies["greedy"]["lambda_c"] == 1.0

    def test_yaml_file_wrong_content(self, tmp_path) -> None:
        strategy_file = tmp_path / "strategies.yaml"
        strategy_file.write_text("- raster\n- rect\n")
        with pytest.raises(InvalidScanSpecification):
            StrategySet(strategy_file)

    def test_wrong_file(self) -> None:
        with pytest.raises(InvalidScanSpecification):
            StrategySet("non-existing.yaml")

    def test_wrong_type(self) -> None:
        with pytest.raises(InvalidScanSpecification):
            StrategySet(42)  # noqa

    def test_to_string(self) -> None:
        strategies = StrategySet("raster x:rect")
        assert strategies.to_string() == "raster:raster x:rect"
        assert StrategySet(strategies.to_string()).to_string() == strategies.to_string()

    def test_descriptions(self) -> None:
        descriptions = StrategySet().descriptions()
        assert set(descriptions) == {"raster", "rect", "fermat"}

    def test_dictionary_to_string(self) -> None:
        assert strategy_dictionary_to_string({"a": "raster", "b": "rect"}) == "a:raster b:rect"

    def test_long_list_of_cases(self):
        cases = [
            ("raster", True),
            ("raster rect fermat", True),
            ("raster  rect", True),
            ("a:raster b:raster", True),
            ("raster raster", False),  # raster labelled twice
            ("fermat fermat,lambda_c=0.1", False),  # fermat labelled twice
            ("a:raster a:rect", False),
            (":raster", False),
            ("a:", False),
            ("a:b:raster", False),
            ("raster hilbert", False),
            ("fermat,lambda_c=2", False),
            ("", False),
            ("   ", False),
            (None, True),
        ]
        for case, valid in cases:
            assert is_a_valid_strategy_set(case) == valid, case
            if not valid:
                with pytest.raises(InvalidScanSpecification):
                    parse_strategy_set(case)
