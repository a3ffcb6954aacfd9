var a = 1, b = 2, c = 3, x = 1, img = ee.Image(0), s = 'z';
var o = {a: 1, /* key */ b: 'x//y'}; // object
// standalone comment 67

var s3 = 'it\'s // fine'; // escaped quote
var n = ee.Number(4) // comment between
  .sqrt();
// standalone comment 21
var q = a / b / c; // divisions, not regexes
// standalone comment 4

print(typeof /x/.source); // regex after keyword
var tpl = `a${`nested ${'//'} tpl`}b`; // nested template
var re = /\/\*.*?\*\//g; // regex with comment delimiters
if (x) { /* empty */ } else { print('a/*b*/c'); }
