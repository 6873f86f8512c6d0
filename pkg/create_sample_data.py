import os

from phtlab.core.file_io import FileService
from phtlab.services.corpus import CorpusService

DATA_DIR = "data"
BUNDLED = ("square", "arrowhead", "perturbed_arrowhead", "crown", "five_star", "spiral", "pentagon")


def create_sample_data(directory: str = DATA_DIR):
    os.makedirs(directory, exist_ok=True)
    print("📝 Writing bundled shapes...")
    for name in BUNDLED:
        polygon = CorpusService.named(name)
        record = FileService.shape_record(polygon.vertices, CorpusService.named_center(name))
        FileService.write_json(os.path.join(directory, f"{name}.json"), record)
        print(f"  {name}: {polygon.k} vertices")

    # the bowtie is kept as an invalid input example
    FileService.write_json(
        os.path.join(directory, "bowtie.json"),
        {"vertices": [[0.0, 0.0], [2.0, 2.0], [2.0, 0.0], [0.0, 2.0]]},
    )
    print("✅ Sample shapes created successfully!")


if __name__ == "__main__":
    create_sample_data()
