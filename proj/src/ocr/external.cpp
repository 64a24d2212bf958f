#include <string>

#include "lpsr/errors.hpp"
#include "lpsr/ocr.hpp"
#include "lpsr/png_io.hpp"
#include "lpsr/subprocess.hpp"

namespace lpsr::ocr {

PlateString recognize_external(const img::Image& image, const AdapterOptions& adapter, const PatternSet& patterns) {
    if (adapter.command.find("{img}") == std::string::npos) {
        throw InvalidArgument("OCR adapter command must contain {img}: " + adapter.command);
    }
    TempDir dir;
    const auto png = dir.path() / "plate.png";
    img::write_png(image, png);
    const ProcessResult r = run_shell(fill_template(adapter.command, {{"img", png.string()}}), adapter.timeout);
    if (r.timed_out) {
        throw AdapterFailure("OCR adapter timed out after " + std::to_string(adapter.timeout.count()) + " ms", r.err,
                             r.exit_code);
    }
    if (r.exit_code != 0) {
        throw AdapterFailure("OCR adapter exited with status " + std::to_string(r.exit_code), r.err, r.exit_code);
    }
    const std::string first_line = r.out.substr(0, r.out.find('\n'));
    const auto begin = first_line.find_first_not_of(" \t\r\f\v");
    const auto end = first_line.find_last_not_of(" \t\r\f\v");
    const std::string trimmed = begin == std::string::npos ? "" : first_line.substr(begin, end - begin + 1);
    PlateString out = normalize_text(trimmed, patterns);
    out.raw = r.out;
    return out;
}

}  // namespace lpsr::ocr
