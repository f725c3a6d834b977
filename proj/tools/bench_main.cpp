// Benchmark: the fold-parallel cross-validation against its serial
// reference, verifying that both produce byte-identical reports.
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <omp.h>

#include "piml/io.hpp"
#include "piml/pipeline.hpp"
#include "piml/synthdata.hpp"

int main(int argc, char** argv) {
    CLI::App app{"piml-bench: serial vs fold-parallel cross-validation"};
    std::string material_arg = "alsi10mg";
    std::string mode_arg = "segmental";
    int jobs = 4;
    int epochs = 2;
    int hidden = 8;
    double noise = 0.02;
    std::uint64_t seed = 42;
    app.add_option("--material", material_arg, "nylon | cf-abs | alsi10mg | ti6al4v");
    app.add_option("--mode", mode_arg, "architecture mode to benchmark");
    app.add_option("--jobs", jobs, "worker count for the parallel run");
    app.add_option("--epochs", epochs, "training epochs");
    app.add_option("--hidden", hidden, "LSTM hidden units");
    app.add_option("--noise", noise, "synthetic noise level");
    app.add_option("--seed", seed, "generator and training seed");
    CLI11_PARSE(app, argc, argv);

    try {
        const piml::MaterialId material = piml::material_from_name(material_arg);
        const piml::ArchitectureMode mode = piml::mode_from_name(mode_arg);
        const auto samples =
            piml::generate_samples(piml::TruthMap::defaults_for(material), noise, seed);
        piml::ModelConfig config = piml::ModelConfig::defaults_for(material);
        config.epochs = epochs;
        config.hidden_units = hidden;
        config.seed = seed;

        std::cout << "benchmark: material=" << piml::material_name(material)
                  << " mode=" << piml::mode_name(mode) << " samples=" << samples.size()
                  << " epochs=" << epochs << " hidden=" << hidden << " jobs=" << jobs
                  << "\n";

        const double t0 = omp_get_wtime();
        const auto serial =
            piml::run_cross_validation(samples, material, mode, config, 5, 1);
        const double t1 = omp_get_wtime();
        const auto parallel =
            piml::run_cross_validation(samples, material, mode, config, 5, jobs);
        const double t2 = omp_get_wtime();

        const std::string serial_bytes = piml::io::report_to_json(serial).dump(2);
        const std::string parallel_bytes = piml::io::report_to_json(parallel).dump(2);
        const bool identical = serial_bytes == parallel_bytes;

        std::cout << "serial   (jobs=1): " << (t1 - t0) << " s\n";
        std::cout << "parallel (jobs=" << jobs << "): " << (t2 - t1) << " s\n";
        std::cout << "speedup: " << (t1 - t0) / (t2 - t1) << "x\n";
        std::cout << "reports byte-identical: " << (identical ? "yes" : "NO") << "\n";
        return identical ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
