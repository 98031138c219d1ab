/// Reports that flatten to `key=value` lines and CSV rows.
pub trait FlatReport {
    fn fields(&self) -> Vec<(&'static str, String)>;

    fn to_kv_block(&self) -> String {
        self.fields().into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    fn csv_header(&self) -> String {
        let keys: Vec<&str> = self.fields().into_iter().map(|(k, _)| k).collect();
        keys.join(",")
    }

    fn csv_row(&self) -> String {
        let values: Vec<String> = self.fields().into_iter().map(|(_, v)| v).collect();
        values.join(",")
    }
}
