#include "orsep/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "orsep/conjugacy.hpp"
#include "orsep/dehn.hpp"
#include "orsep/hierarchy.hpp"
#include "orsep/hnn.hpp"
#include "orsep/quotients.hpp"
#include "orsep/words.hpp"

namespace orsep {

namespace {

using Json = nlohmann::ordered_json;

struct CliConfig {
  int max_index = 12;
  int max_len = 12;
  std::size_t closure_bound = kDefaultClosureBound;
  std::string cache_dir;
  bool no_cache = false;
  bool json = false;
  bool human = false;
};

std::string default_cache_dir() {
  if (const char* env = std::getenv("ORSEP_CACHE_DIR"); env && *env) return env;
  if (const char* xdg = std::getenv("XDG_DATA_HOME"); xdg && *xdg)
    return (std::filesystem::path(xdg) / "orsep").string();
  if (const char* home = std::getenv("HOME"); home && *home)
    return (std::filesystem::path(home) / ".local" / "share" / "orsep").string();
  return {};
}

std::optional<std::string> resolved_cache(const CliConfig& cfg) {
  if (cfg.no_cache) return std::nullopt;
  std::string dir = cfg.cache_dir.empty() ? default_cache_dir() : cfg.cache_dir;
  if (dir.empty()) return std::nullopt;
  return dir;
}

void add_common_flags(CLI::App* cmd, CliConfig& cfg) {
  cmd->add_option("--max-index", cfg.max_index, "largest quotient index searched");
  cmd->add_option("--max-len", cfg.max_len, "largest conjugator length searched");
  cmd->add_option("--closure-bound", cfg.closure_bound, "permutation closure size bound");
  cmd->add_option("--cache-dir", cfg.cache_dir, "quotient cache directory");
  cmd->add_flag("--no-cache", cfg.no_cache, "disable the quotient cache");
  cmd->add_flag("--json", cfg.json, "JSON output");
  cmd->add_flag("--human", cfg.human, "human-readable output");
}

ConjugacyBudget budget_from(const CliConfig& cfg) {
  ConjugacyBudget b;
  b.max_conjugator_len = cfg.max_len;
  b.max_index = cfg.max_index;
  b.closure_bound = cfg.closure_bound;
  b.cache_dir = resolved_cache(cfg);
  return b;
}

std::string perm_cycles(const Perm& p) { return p.cycles_string(); }

int emit_certificate(const Certificate& cert, const CliConfig& cfg, const std::string& out_path) {
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "error: cannot write " << out_path << "\n";
      return 1;
    }
    out << cert.dump(2) << "\n";
  }
  if (cfg.human) {
    std::string kind = cert.kind();
    if (kind == "Conjugacy") {
      std::cout << "conjugate: u = "
                << cert.doc.at("witness").at("conjugator").get<std::string>() << "\n";
    } else {
      std::cout << "not conjugate (" << kind << " via "
                << cert.doc.at("witness").at("method").get<std::string>() << ")\n";
    }
    std::cout << "verified: " << (verify_certificate(cert) ? "true" : "false") << "\n";
  } else if (out_path.empty()) {
    std::cout << cert.dump(2) << "\n";
  } else {
    std::cout << out_path << "\n";
  }
  return 0;
}

int emit_undecided(const CliConfig& cfg, const std::string& reason) {
  if (cfg.human) {
    std::cout << "undecided: " << reason << "\n";
  } else {
    Json j;
    j["verdict"] = "undecided";
    j["reason"] = reason;
    std::cout << j.dump(2) << "\n";
  }
  return 2;
}

FiniteQuotient quotient_from_action(const Presentation& p, const std::string& spec) {
  std::vector<std::optional<std::vector<int>>> images(p.generators().size());
  std::stringstream parts(spec);
  std::string part;
  while (std::getline(parts, part, ';')) {
    if (part.empty()) continue;
    auto eq = part.find('=');
    if (eq == std::string::npos) fail(Errc::syntax_error, "action entry needs name=i0,i1,...");
    std::string name = part.substr(0, eq);
    while (!name.empty() && name.front() == ' ') name.erase(name.begin());
    while (!name.empty() && name.back() == ' ') name.pop_back();
    int g = p.index_of(name);
    if (g < 0) fail(Errc::syntax_error, "action names an unknown generator: " + name);
    std::vector<int> img;
    std::stringstream nums(part.substr(eq + 1));
    std::string tok;
    while (std::getline(nums, tok, ',')) img.push_back(std::stoi(tok));
    images[std::size_t(g)] = std::move(img);
  }
  std::vector<Perm> perms;
  for (std::size_t g = 0; g < images.size(); ++g) {
    if (!images[g])
      fail(Errc::syntax_error, "action omits generator " + p.generators()[g].name);
    perms.emplace_back(*images[g]);
  }
  return FiniteQuotient(relator_system(p), std::move(perms));
}

int cmd_parse(const std::string& pres, const CliConfig& cfg) {
  Presentation p = parse_presentation(pres);
  if (cfg.json) {
    Json j;
    j["generators"] = generator_names(p);
    j["relator_root"] = p.print_word(p.relator_root().representative());
    j["exponent"] = p.exponent();
    j["rc"] = compute_rc(p);
    Json ff = Json::array();
    for (int g : p.free_factors()) ff.push_back(p.generators()[std::size_t(g)].name);
    j["free_factors"] = ff;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << p.print() << "\n";
    std::cout << "rc: " << compute_rc(p) << "\n";
  }
  return 0;
}

int cmd_wp(const std::string& pres, const std::string& word, const CliConfig& cfg) {
  Presentation p = parse_presentation(pres);
  Word w = parse_word_over(word, generator_names(p));
  bool trivial = is_trivial(w, p);
  if (cfg.json) {
    Json j;
    j["word"] = p.print_word(w);
    j["trivial"] = trivial;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << (trivial ? "trivial" : "nontrivial") << "\n";
  }
  return 0;
}

int cmd_rc(const std::string& pres) {
  Presentation p = parse_presentation(pres);
  std::cout << compute_rc(p) << "\n";
  return 0;
}

int cmd_decompose(const std::string& pres, const CliConfig& cfg) {
  Presentation p = parse_presentation(pres);
  RcZeroDecomposition d(p);
  if (cfg.json) {
    Json j;
    j["free_rank"] = d.free_rank();
    j["torsion_order"] = d.torsion_order();
    j["basis"] = d.basis_names();
    j["eliminated"] = p.generators()[std::size_t(d.eliminated_generator())].name;
    j["substitution"] = print_word_over(d.substitution(), d.basis_names());
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "free product: free rank " << d.free_rank() << ", torsion order "
              << d.torsion_order() << "\n";
    std::cout << "basis: ";
    for (std::size_t i = 0; i < d.basis_names().size(); ++i)
      std::cout << (i ? " " : "") << d.basis_names()[i];
    std::cout << "\n";
    std::cout << p.generators()[std::size_t(d.eliminated_generator())].name << " = "
              << print_word_over(d.substitution(), d.basis_names()) << "\n";
  }
  return 0;
}

int cmd_hierarchy(const std::string& pres, const CliConfig& cfg) {
  Presentation p = parse_presentation(pres);
  HnnData hd = hierarchy_step(p);
  if (cfg.json) {
    std::cout << to_json(hd).dump(2) << "\n";
  } else {
    std::cout << "stable letter: " << hd.stable << "\n";
    std::cout << "base: " << hd.base.print() << "\n";
    std::cout << "rc: " << hd.rc_before << " -> " << hd.rc_after << "\n";
    std::cout << "magnus condition: " << (verify_magnus_condition(hd) ? "true" : "false") << "\n";
  }
  return 0;
}

int cmd_quotients(const std::string& pres, bool hnn_system, const CliConfig& cfg) {
  Presentation p = parse_presentation(pres);
  RelatorSystem sys;
  if (hnn_system) {
    sys = hnn_relator_system(hierarchy_step(p));
  } else {
    sys = relator_system(p);
  }
  auto quotients = enumerate_low_index(sys, cfg.max_index);
  if (auto dir = resolved_cache(cfg)) {
    try {
      append_cached_quotients(sys, quotients, *dir);
    } catch (const std::exception& e) {
      std::cerr << "warning: cache disabled: " << e.what() << "\n";
    }
  }
  if (cfg.json) {
    Json arr = Json::array();
    for (const auto& q : quotients) arr.push_back(quotient_to_json(q));
    std::cout << arr.dump(2) << "\n";
  } else {
    for (const auto& q : quotients) {
      std::cout << "degree " << q.degree() << ":";
      for (std::size_t g = 0; g < sys.generators.size(); ++g)
        std::cout << " " << sys.generators[g] << "=" << perm_cycles(q.images()[g]);
      std::cout << "\n";
    }
    std::cout << quotients.size() << " quotients up to index " << cfg.max_index << "\n";
  }
  return 0;
}

int cmd_conj(const std::string& pres, const std::string& xs, const std::string& ys,
             const CliConfig& cfg, const std::string& out_path) {
  Presentation p = parse_presentation(pres);
  auto names = generator_names(p);
  Word x = parse_word_over(xs, names);
  Word y = parse_word_over(ys, names);
  try {
    Certificate cert = decide_conjugacy(p, x, y, budget_from(cfg));
    return emit_certificate(cert, cfg, out_path);
  } catch (const Error& e) {
    if (e.code() == Errc::budget_exceeded) return emit_undecided(cfg, e.what());
    throw;
  }
}

int cmd_conj_sub(const std::string& pres, const std::string& xs, const std::string& ys,
                 const std::string& action, const std::string& q0_spec, const CliConfig& cfg,
                 const std::string& out_path) {
  Presentation p = parse_presentation(pres);
  auto names = generator_names(p);
  Word x = parse_word_over(xs, names);
  Word y = parse_word_over(ys, names);
  FiniteQuotient q = quotient_from_action(p, action);
  std::vector<Perm> q0;
  if (!q0_spec.empty()) {
    std::stringstream parts(q0_spec);
    std::string part;
    while (std::getline(parts, part, ';'))
      if (!part.empty()) q0.push_back(q.evaluate(parse_word_over(part, names)));
  }
  FiniteIndexSubgroup h1(q, q0, cfg.closure_bound);
  try {
    Certificate cert = decide_conjugacy_in_subgroup(p, h1, x, y, budget_from(cfg));
    return emit_certificate(cert, cfg, out_path);
  } catch (const Error& e) {
    if (e.code() == Errc::budget_exceeded) return emit_undecided(cfg, e.what());
    throw;
  }
}

int cmd_verify(const std::string& path, const CliConfig& cfg) {
  std::string text;
  if (path == "-") {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    text = buf.str();
  } else {
    std::ifstream in(path);
    if (!in) {
      std::cerr << "error: cannot read " << path << "\n";
      return 1;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  bool ok = false;
  try {
    ok = verify_certificate(Certificate::from_text(text));
  } catch (const std::exception&) {
    ok = false;
  }
  if (cfg.json) {
    Json j;
    j["valid"] = ok;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << (ok ? "true" : "false") << "\n";
  }
  return ok ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"one-relator groups with torsion: word problem, hierarchy, and conjugacy"};
  app.require_subcommand(1);
  CliConfig cfg;

  std::string pres, word, xs, ys, action, q0_spec, out_path, cert_path;
  bool hnn_system = false;

  auto* c_parse = app.add_subcommand("parse", "parse and normalize a presentation");
  c_parse->add_option("presentation", pres)->required();
  add_common_flags(c_parse, cfg);

  auto* c_wp = app.add_subcommand("wp", "decide the word problem");
  c_wp->add_option("presentation", pres)->required();
  c_wp->add_option("word", word)->required();
  add_common_flags(c_wp, cfg);

  auto* c_rc = app.add_subcommand("rc", "repetition complexity of the relator root");
  c_rc->add_option("presentation", pres)->required();
  add_common_flags(c_rc, cfg);

  auto* c_dec = app.add_subcommand("decompose", "free-product decomposition at rc zero");
  c_dec->add_option("presentation", pres)->required();
  add_common_flags(c_dec, cfg);

  auto* c_hier = app.add_subcommand("hierarchy", "one descent step of the rc hierarchy");
  c_hier->add_option("presentation", pres)->required();
  add_common_flags(c_hier, cfg);

  auto* c_quot = app.add_subcommand("quotients", "enumerate low-index quotients");
  c_quot->add_option("presentation", pres)->required();
  c_quot->add_flag("--hnn", hnn_system, "enumerate for the HNN presentation instead");
  add_common_flags(c_quot, cfg);

  auto* c_conj = app.add_subcommand("conj", "decide conjugacy of two words");
  c_conj->add_option("presentation", pres)->required();
  c_conj->add_option("x", xs)->required();
  c_conj->add_option("y", ys)->required();
  add_common_flags(c_conj, cfg);

  auto* c_sub = app.add_subcommand("conj-sub", "decide conjugacy inside a finite-index subgroup");
  c_sub->add_option("presentation", pres)->required();
  c_sub->add_option("x", xs)->required();
  c_sub->add_option("y", ys)->required();
  c_sub->add_option("--action", action, "generator images, e.g. a=1,0;b=0,1")->required();
  c_sub->add_option("--q0", q0_spec, "semicolon-separated words generating Q0 (default trivial)");
  add_common_flags(c_sub, cfg);

  auto* c_cert = app.add_subcommand("certify", "decide conjugacy and write the certificate");
  c_cert->add_option("presentation", pres)->required();
  c_cert->add_option("x", xs)->required();
  c_cert->add_option("y", ys)->required();
  c_cert->add_option("--out", out_path, "certificate output file");
  add_common_flags(c_cert, cfg);

  auto* c_ver = app.add_subcommand("verify", "verify a certificate file ('-' for stdin)");
  c_ver->add_option("certificate", cert_path)->required();
  add_common_flags(c_ver, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (c_parse->parsed()) return cmd_parse(pres, cfg);
    if (c_wp->parsed()) return cmd_wp(pres, word, cfg);
    if (c_rc->parsed()) return cmd_rc(pres);
    if (c_dec->parsed()) return cmd_decompose(pres, cfg);
    if (c_hier->parsed()) return cmd_hierarchy(pres, cfg);
    if (c_quot->parsed()) return cmd_quotients(pres, hnn_system, cfg);
    if (c_conj->parsed()) return cmd_conj(pres, xs, ys, cfg, "");
    if (c_sub->parsed()) return cmd_conj_sub(pres, xs, ys, action, q0_spec, cfg, "");
    if (c_cert->parsed()) return cmd_conj(pres, xs, ys, cfg, out_path);
    if (c_ver->parsed()) return cmd_verify(cert_path, cfg);
  } catch (const Error& e) {
    if (e.code() == Errc::budget_exceeded) {
      std::cerr << "undecided: " << e.what() << "\n";
      return 2;
    }
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace orsep
