// Run configuration: flat INI-style "key = value" files with [section]
// headers, every key overridable by a --section.key (or bare --key) flag.
// Precedence: flags > file > defaults.
#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vfg/common.hpp"
#include "vfg/dae.hpp"
#include "vfg/latent.hpp"
#include "vfg/synth.hpp"

namespace vfg {

class KvConfig {
public:
    void load_file(const std::string& path) {
        std::ifstream f(path);
        check(f.good(), "io-error", "cannot read config file: " + path);
        std::string line, section;
        int lineno = 0;
        while (std::getline(f, line)) {
            ++lineno;
            auto hash = line.find_first_of("#;");
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[' && line.back() == ']') {
                section = normalize(trim(line.substr(1, line.size() - 2)));
                continue;
            }
            auto eq = line.find('=');
            check(eq != std::string::npos, "bad-config",
                  "config line " + std::to_string(lineno) + " is not key = value");
            std::string key = normalize(trim(line.substr(0, eq)));
            std::string value = trim(line.substr(eq + 1));
            set(section.empty() ? key : section + "." + key, value);
        }
    }

    void set(const std::string& key, const std::string& value) {
        values_[normalize(key)] = value;
    }

    bool has(const std::string& key) const { return values_.count(normalize(key)) > 0; }

    std::string get(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(normalize(key));
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(normalize(key));
        if (it == values_.end()) return fallback;
        try {
            return std::stod(it->second);
        } catch (const std::exception&) {
            fail("bad-config", "key " + key + " is not a number: " + it->second);
        }
    }

    long long get_int(const std::string& key, long long fallback) const {
        auto it = values_.find(normalize(key));
        if (it == values_.end()) return fallback;
        try {
            return std::stoll(it->second);
        } catch (const std::exception&) {
            fail("bad-config", "key " + key + " is not an integer: " + it->second);
        }
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto it = values_.find(normalize(key));
        if (it == values_.end()) return fallback;
        std::string v = it->second;
        std::transform(v.begin(), v.end(), v.begin(), ::tolower);
        if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
        if (v == "0" || v == "false" || v == "no" || v == "off") return false;
        fail("bad-config", "key " + key + " is not a boolean: " + it->second);
    }

    std::vector<int> get_int_list(const std::string& key, std::vector<int> fallback) const {
        auto it = values_.find(normalize(key));
        if (it == values_.end()) return fallback;
        std::vector<int> out;
        std::stringstream ss(it->second);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok = trim(tok);
            if (!tok.empty()) out.push_back(std::stoi(tok));
        }
        check(!out.empty(), "bad-config", "key " + key + " is an empty list");
        return out;
    }

    static std::string normalize(std::string k) {
        std::transform(k.begin(), k.end(), k.begin(), ::tolower);
        std::replace(k.begin(), k.end(), '-', '_');
        return k;
    }

private:
    static std::string trim(const std::string& s) {
        auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return {};
        auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    std::map<std::string, std::string> values_;
};

struct RunConfig {
    // paths
    std::string out = "out";
    std::string dataset_dir;
    std::string checkpoint;
    std::string probe_file;
    std::string calibration_file;
    std::string report_dir;
    std::string loss_csv;

    DatasetSpec synth;
    DaeConfig dae;
    ProbeConfig probe;
    std::string probe_kind = "svm";          // linear | svm
    std::string calibration_kind = "two_point";  // two_point | poly1 | poly3
    int eval_t = 20;
    int gen_t = 100;
    int eval_recon_images = 64;
    bool single_thread = false;

    static RunConfig from_kv(const KvConfig& kv) {
        RunConfig rc;
        rc.out = kv.get("paths.out", "out");
        rc.dataset_dir = kv.get("paths.dataset_dir", rc.out + "/dataset");
        rc.checkpoint = kv.get("paths.checkpoint", rc.out + "/dae.ckpt");
        rc.probe_file = kv.get("paths.probe", rc.out + "/probe.json");
        rc.calibration_file = kv.get("paths.calibration", rc.out + "/calibration.json");
        rc.report_dir = kv.get("paths.report_dir", rc.out + "/report");
        rc.loss_csv = kv.get("paths.loss_csv", rc.out + "/loss.csv");

        std::string synth_preset = kv.get("synth.preset", "default");
        if (synth_preset == "paper-like" || synth_preset == "paper_like")
            rc.synth = DatasetSpec::paper_like();
        else
            check(synth_preset == "default", "bad-config",
                  "unknown synth preset: " + synth_preset);
        rc.synth.n_train = static_cast<int>(kv.get_int("synth.n_train", rc.synth.n_train));
        rc.synth.n_val = static_cast<int>(kv.get_int("synth.n_val", rc.synth.n_val));
        rc.synth.n_test = static_cast<int>(kv.get_int("synth.n_test", rc.synth.n_test));
        rc.synth.healthy_frac = kv.get_double("synth.healthy_frac", rc.synth.healthy_frac);
        rc.synth.graded_frac = kv.get_double("synth.graded_frac", rc.synth.graded_frac);
        rc.synth.seed = static_cast<std::uint64_t>(kv.get_int("synth.seed", 1));
        rc.synth.write_raw = kv.get_bool("synth.raw", false);
        rc.synth.gen.image_size =
            static_cast<int>(kv.get_int("synth.image_size", rc.synth.gen.image_size));
        rc.synth.gen.noise_sigma = kv.get_double("synth.noise_sigma", rc.synth.gen.noise_sigma);
        rc.synth.gen.body_count =
            static_cast<int>(kv.get_int("synth.body_count", rc.synth.gen.body_count));

        std::string dae_preset = kv.get("dae.preset", "desk");
        if (dae_preset == "paper")
            rc.dae = DaeConfig::paper();
        else
            check(dae_preset == "desk", "bad-config", "unknown dae preset: " + dae_preset);
        rc.dae.image_size = static_cast<int>(kv.get_int("dae.image_size", rc.dae.image_size));
        rc.dae.d = static_cast<int>(kv.get_int("dae.d", rc.dae.d));
        rc.dae.base_width = static_cast<int>(kv.get_int("dae.base_width", rc.dae.base_width));
        rc.dae.mult = kv.get_int_list("dae.mult", rc.dae.mult);
        rc.dae.time_embed_dim =
            static_cast<int>(kv.get_int("dae.time_embed_dim", rc.dae.time_embed_dim));
        rc.dae.sin_dim = static_cast<int>(kv.get_int("dae.sin_dim", rc.dae.sin_dim));
        rc.dae.groups = static_cast<int>(kv.get_int("dae.groups", rc.dae.groups));
        rc.dae.train_t = static_cast<int>(kv.get_int("dae.train_t", rc.dae.train_t));
        rc.dae.beta_start = kv.get_double("dae.beta_start", rc.dae.beta_start);
        rc.dae.beta_end = kv.get_double("dae.beta_end", rc.dae.beta_end);
        rc.dae.loss = kv.get("dae.loss", rc.dae.loss);
        rc.dae.lr = kv.get_double("dae.lr", rc.dae.lr);
        rc.dae.batch_size = static_cast<int>(kv.get_int("dae.batch_size", rc.dae.batch_size));
        rc.dae.total_samples = kv.get_int("dae.total_samples", rc.dae.total_samples);
        rc.dae.seed = static_cast<std::uint64_t>(kv.get_int("dae.seed", 7));

        rc.probe_kind = kv.get("probe.kind", rc.probe_kind);
        check(rc.probe_kind == "svm" || rc.probe_kind == "linear", "bad-config",
              "probe.kind must be linear or svm");
        rc.probe.epochs = static_cast<int>(kv.get_int("probe.epochs", rc.probe.epochs));
        rc.probe.lr = kv.get_double("probe.lr", rc.probe.lr);
        rc.probe.l2 = kv.get_double("probe.l2", rc.probe.l2);
        rc.probe.svm_lambda = kv.get_double("probe.lambda", rc.probe.svm_lambda);
        rc.probe.class_weight = kv.get_bool("probe.class_weight", rc.probe.class_weight);

        rc.calibration_kind = kv.get("calibrate.kind", rc.calibration_kind);
        check(rc.calibration_kind == "two_point" || rc.calibration_kind == "poly1" ||
                  rc.calibration_kind == "poly3",
              "bad-config", "calibrate.kind must be two_point, poly1 or poly3");

        rc.eval_t = static_cast<int>(kv.get_int("steps.eval_t", rc.eval_t));
        rc.gen_t = static_cast<int>(kv.get_int("steps.gen_t", rc.gen_t));
        rc.eval_recon_images =
            static_cast<int>(kv.get_int("eval.recon_images", rc.eval_recon_images));

        // global seed overrides both stage seeds
        if (kv.has("seed")) {
            auto s = static_cast<std::uint64_t>(kv.get_int("seed", 0));
            rc.synth.seed = s;
            rc.dae.seed = mix_seed(s, 0x7E41);
        }
        rc.single_thread = kv.get_bool("single_thread", false);
        return rc;
    }
};

}  // namespace vfg
