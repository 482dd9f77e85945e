#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "stovex/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"stochastic six-vertex model lab"};
    std::string mode, config, out;
    std::optional<std::uint64_t> seed;
    app.add_option("mode", mode, "verify | simulate | solve | compare | exact-examples")->required();
    app.add_option("--config", config, "configuration file")->required();
    app.add_option("--out", out, "output directory (overrides output_dir)");
    app.add_option("--seed", seed, "master seed (overrides mc.seed)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    try {
        stovex::RunConfig cfg = stovex::load_config(config);
        cfg.mode = stovex::mode_from_string(mode);
        if (!out.empty()) cfg.output_dir = out;
        if (seed) cfg.seed = *seed;
        // Re-validate after overrides, then run.
        std::istringstream canon(cfg.emit());
        cfg = stovex::parse_config(canon);
        return stovex::run(cfg, std::cerr);
    } catch (const stovex::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
}
